def solve(aa, n):
    bb = sorted(aa)
    ans = 0
    for i in range(n):
        if aa[i] != bb[i]:
            ans += 1
    print(ans)


n = int(input())
aa = list(map(int, input().split()))
for i in range(n):
    aa[i] = aa[i] * 2
solve(aa, n)
