n = int(input())
for i in range(n - 1, -1, -1):
    print(i)
i = 0
while i * i < n:
    i += 1
print(i)
