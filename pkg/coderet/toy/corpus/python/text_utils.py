"""String helpers."""

import re


def reverse_string(text):
    """Return the characters of the text in reverse order."""
    chars = list(text)
    left = 0
    right = len(chars) - 1
    while left < right:
        # swap the outer pair and move both ends inwards
        chars[left], chars[right] = chars[right], chars[left]
        left += 1
        right -= 1
    return "".join(chars)


def is_palindrome(text):
    """Check whether the text reads the same forwards and backwards."""
    cleaned = [c.lower() for c in text if c.isalnum()]
    left = 0
    right = len(cleaned) - 1
    while left < right:
        if cleaned[left] != cleaned[right]:
            return False
        left += 1
        right -= 1
    return True


def count_words(text):
    """Count how often each word occurs in the text."""
    counts = {}
    # TODO: handle punctuation attached to words
    for word in text.lower().split():
        counts[word] = counts.get(word, 0) + 1
    return counts


def parse(line):
    """Split a key=value configuration line into a key and a value pair."""
    if "=" not in line:
        raise ValueError("missing separator in line")
    key, _, value = line.partition("=")
    # surrounding whitespace is not part of either side
    return key.strip(), value.strip()


def validate(address):
    """Tell whether an email address looks well formed."""
    pattern = r"^[\w.+-]+@[\w-]+\.[\w.]+$"
    # noqa: W605 the pattern is a raw string already
    return re.match(pattern, address) is not None


def slugify(title):
    """Turn a title into a lowercase url slug separated by dashes."""
    words = re.findall(r"[a-z0-9]+", title.lower())
    return "-".join(words)


def capitalize_words(sentence):
    """Upper-case the first letter of every word in a sentence."""
    # words are separated by single spaces in our inputs
    return " ".join(w[:1].upper() + w[1:] for w in sentence.split(" "))


def truncate(text, limit):
    """Shorten text to at most limit characters, adding an ellipsis when cut."""
    if len(text) <= limit:
        return text
    # keep room for the three dots
    return text[:max(limit - 3, 0)] + "..."
