def ping(n):
    m = pong(n)
    return m

def pong(n):
    m = ping(n)
    return m
