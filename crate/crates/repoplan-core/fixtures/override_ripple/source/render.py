from shapes import Shape

def render(shape: Shape, size):
    value = shape.area(size)
    return value
