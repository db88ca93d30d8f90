def insertion_sort(collection):
    items = list(collection)
    for index in range(1, len(items)):
        value = items[index]
        pos = index - 1
        while pos >= 0 and items[pos] > value:
            items[pos + 1] = items[pos]
            pos -= 1
        items[pos + 1] = value
    return items
