"""OpenDRIVE model, emitter, parser and validator."""
