"""GIB-MAP explanations for discrete belief networks."""
