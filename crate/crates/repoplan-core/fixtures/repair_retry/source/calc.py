from mathlib import double, triple

def scale(x):
    y = double(x)
    return y
