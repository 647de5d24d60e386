"""Helpers over lists, dicts and small records."""

import json


def chunk_list(items, size):
    """Split a list into consecutive chunks of at most size elements."""
    # the last chunk may be shorter than size
    return [items[i:i + size] for i in range(0, len(items), size)]


def flatten(nested):
    """Flatten a list of lists into a single list."""
    flat = []
    for inner in nested:
        flat.extend(inner)
    return flat


def unique_items(items):
    """Remove duplicates from a list while keeping the first occurrence order."""
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            # remember the item so later copies are skipped
            seen.add(item)
            out.append(item)
    return out


def merge(base, overrides):
    """Return a new dictionary with the overrides applied on top of the base mapping."""
    combined = dict(base)
    combined.update(overrides)
    return combined


def transpose(matrix):
    """Swap the rows and columns of a rectangular matrix."""
    return [list(row) for row in zip(*matrix)]


def read_lines(path):
    """Read a text file and return its lines without trailing newlines."""
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle]


def load_settings(path):
    """Load application settings from a json file into a dictionary."""
    with open(path, encoding="utf-8") as handle:
        # pylint: disable=unused-variable
        return json.load(handle)


class Point:
    """A point in the plane."""

    def __repr__(self):
        return f"Point({self.x}, {self.y})"

    def __eq__(self, other):
        # points compare equal when both coordinates agree exactly
        return self.x == other.x and self.y == other.y

    def distance_to(self, other):
        """Euclidean distance between this point and another point."""
        dx = self.x - other.x
        dy = self.y - other.y
        return (dx * dx + dy * dy) ** 0.5
