def f(x):
    """Return x doubled."""
    y = x * 2
    return y
