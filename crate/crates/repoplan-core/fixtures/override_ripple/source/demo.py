from render import render
from shapes import Circle

def run(size):
    c = Circle()
    value = render(c, size)
    return value
