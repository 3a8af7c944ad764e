"""Hypothesis strategies shared across test modules."""

import numpy as np
from hypothesis import strategies as st

from ppmmsel.moments import ObservedSummary, PatternMoments


def summaries():
    """Random valid observed summaries."""
    return st.builds(
        lambda mx, my, vx, vy, rho, mx0, vx0, pi: ObservedSummary(
            PatternMoments(mx, my, vx, vy, rho * np.sqrt(vx * vy)), mx0, vx0, pi
        ),
        st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.1, 5),
        st.floats(0.01, 0.99), st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.05, 0.95),
    )
