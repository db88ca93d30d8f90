def linear_search(sequence, target):
    for index, item in enumerate(sequence):
        if item == target:
            return index
    return -1
