from lib import is_valid, helper

def gate(state):
    ok = is_valid(state)
    return ok

def assist(state):
    h = helper(state)
    return h
