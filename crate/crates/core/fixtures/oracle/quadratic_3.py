def count_less(a, x):
    c = 0
    for v in a:
        if v < x:
            c += 1
    return c


n = int(input())
a = list(map(int, input().split()))
res = 0
for x in a:
    res += count_less(a, x)
print(res)
