def show(value):
    shown = value
    return shown
