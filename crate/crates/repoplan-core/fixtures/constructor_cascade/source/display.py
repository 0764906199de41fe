def emit_line(value):
    line = value
    return line
