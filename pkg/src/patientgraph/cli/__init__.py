"""Command-line surface: generate, preprocess, build-graph, train, evaluate, compare."""
