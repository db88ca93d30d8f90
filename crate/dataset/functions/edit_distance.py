def edit_distance(word1, word2):
    memo = {}

    def solve(i, j):
        if (i, j) in memo:
            return memo[(i, j)]
        if i == len(word1):
            result = len(word2) - j
        elif j == len(word2):
            result = len(word1) - i
        elif word1[i] == word2[j]:
            result = solve(i + 1, j + 1)
        else:
            result = 1 + min(solve(i + 1, j), solve(i, j + 1), solve(i + 1, j + 1))
        memo[(i, j)] = result
        return result

    return solve(0, 0)
