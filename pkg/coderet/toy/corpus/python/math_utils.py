"""Number helpers."""

import math


def gcd(a, b):
    """Compute the greatest common divisor of two integers."""
    a = abs(a)
    b = abs(b)
    while b != 0:
        # replace the pair by the divisor and the remainder
        temp = b
        b = a % b
        a = temp
    return a


def fibonacci(n):
    """Return the n-th Fibonacci number computed iteratively."""
    if n < 2:
        return n
    prev = 0
    curr = 1
    for _ in range(n - 1):
        # shift the window of the last two numbers forward
        nxt = prev + curr
        prev = curr
        curr = nxt
    return curr


def normalize(vector):
    """Scale a numeric vector to unit euclidean length."""
    length = math.sqrt(sum(x * x for x in vector))
    if length == 0:
        return list(vector)
    return [x / length for x in vector]


def score(first, second):
    """Jaccard similarity of two collections of tags."""
    a = set(first)
    b = set(second)
    # two empty collections count as identical
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def factorial(n):
    """Return n factorial for a non-negative integer n."""
    result = 1
    for k in range(2, n + 1):
        result *= k
    return result


def mean(numbers):
    """Arithmetic mean of a non-empty list of numbers."""
    # result = sum(numbers) / len(numbers)
    total = 0.0
    for x in numbers:
        total += x
    return total / len(numbers)


def is_prime(n):
    """Decide whether an integer is a prime number by trial division."""
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def clamp(value, lower, upper):
    """Limit a value to the closed range between lower and upper."""
    return max(lower, min(value, upper))
