a, b, c = map(int, input().split())
vals = [a, b, c]
vals.sort()
if vals[0] + vals[1] > vals[2]:
    print("YES")
else:
    print("NO")
