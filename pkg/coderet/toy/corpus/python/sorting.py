"""Sorting and searching helpers."""


def bubble_sort(items):
    """Sort the input list into ascending order."""
    n = len(items)
    for i in range(n):
        swapped = False
        for j in range(n - i - 1):
            # if adjacent elements appear
            # in descending order, swap them
            if items[j] > items[j + 1]:
                temp = items[j]
                items[j] = items[j + 1]
                items[j + 1] = temp
                swapped = True
        if not swapped:
            break
    return items


def binary_search(items, target):
    """Return the index of the target in a sorted list, or -1 when it is missing."""
    low = 0
    high = len(items) - 1
    while low <= high:
        mid = (low + high) // 2
        if items[mid] == target:
            return mid
        # discard the half that cannot hold the target
        if items[mid] < target:
            low = mid + 1
        else:
            high = mid - 1
    return -1


def merge_sorted(left, right):
    """Merge two sorted lists into one sorted list."""
    result = []
    i = 0
    j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            result.append(left[i])
            i += 1
        else:
            result.append(right[j])
            j += 1
    # one of the two inputs still has remaining elements
    result.extend(left[i:])
    result.extend(right[j:])
    return result


def find_max(values):
    """Return the largest value in the list."""
    best = values[0]
    for value in values[1:]:
        if value > best:
            best = value
    return best


def find_min(values):
    """Return the smallest value in the list."""
    smallest = values[0]
    for value in values:
        smallest = min(smallest, value)
    return smallest


def top_k(values, k):
    """Return the k largest values, largest first."""
    # sort a copy so the caller keeps the original order
    ordered = sorted(values, reverse=True)
    return ordered[:k]
