n = int(input())
a = list(map(int, input().split()))
best = 0
i = 0
while i < n:
    j = i
    while j < n:
        s = 0
        for k in range(i, j + 1):
            s += a[k]
        best = max(best, s)
        j += 1
    i += 1
print(best)
