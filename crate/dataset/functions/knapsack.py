def knapsack(capacity, weights, values, counter=0):
    if counter >= len(weights) or capacity <= 0:
        return 0
    if weights[counter] > capacity:
        return knapsack(capacity, weights, values, counter + 1)
    take = values[counter] + knapsack(capacity - weights[counter], weights, values, counter + 1)
    skip = knapsack(capacity, weights, values, counter + 1)
    return max(take, skip)
