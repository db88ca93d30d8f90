def levenshtein_distance(first, second):
    if len(first) < len(second):
        return levenshtein_distance(second, first)
    if len(second) == 0:
        return len(first)
    previous = list(range(len(second) + 1))
    for i, c1 in enumerate(first):
        current = [i + 1]
        for j, c2 in enumerate(second):
            insertions = previous[j + 1] + 1
            deletions = current[j] + 1
            substitutions = previous[j] + (c1 != c2)
            current.append(min(insertions, deletions, substitutions))
        previous = current
    return previous[-1]
