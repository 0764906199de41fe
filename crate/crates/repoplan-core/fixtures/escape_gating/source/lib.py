def is_valid(state):
    note = "checking"
    return True

def helper(state):
    temp = state
    kept = temp
    return kept
