def subsets(i, n, acc, out):
    if i == n:
        out.append(acc)
        return
    subsets(i + 1, n, acc, out)
    subsets(i + 1, n, acc + 1, out)


n = int(input())
res = []
subsets(0, n, 0, res)
print(len(res))
