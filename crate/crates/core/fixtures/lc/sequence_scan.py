def total(xs):
    s = 0
    for x in xs:
        s += x
    return s

n = int(input())
rows = [list(map(int, input().split())) for _ in range(n)]
ans = 0
for row in rows:
    ans += total(row)
print(ans)
