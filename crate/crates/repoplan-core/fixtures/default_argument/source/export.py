from loader import load_checkpoint

def export_model(url, cache):
    state = load_checkpoint(url, cache)
    ready = prepare(state)
    return ready

def prepare(state):
    return state
