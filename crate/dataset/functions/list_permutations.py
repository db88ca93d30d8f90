def list_permutations(items):
    if len(items) <= 1:
        return [list(items)]
    result = []
    for i in range(len(items)):
        rest = items[:i] + items[i + 1:]
        for perm in list_permutations(rest):
            result.append([items[i]] + perm)
    return result
