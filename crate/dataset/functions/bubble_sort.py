def bubble_sort(collection):
    items = list(collection)
    length = len(items)
    for i in range(length - 1):
        swapped = False
        for j in range(length - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                swapped = True
        if not swapped:
            break
    return items
