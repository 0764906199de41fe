from pipeline import Pipeline
from output import default_sink

def build_pipeline(limit):
    p = Pipeline(limit)
    return p

def main(args):
    p = build_pipeline(args)
    r = p.run(args)
    return r
