from loader import load_checkpoint

def train(url, cache):
    state = load_checkpoint(url, cache)
    return state
