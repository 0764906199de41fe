from loader import load_checkpoint

def evaluate(url):
    state = load_checkpoint(url, "eval_cache")
    return state
