"""Load of the typical cell in noise-limited Poisson cellular networks."""
