"""First-order optimization on the Pareto set."""
