"""Periodic multi-agent coverage planning with collision-aware scheduling.

The pipeline turns a scenario (interest points with required delivery rates,
agents with reach, speed and production limits) into a periodic team plan:

1. closed tours over each agent's reachable points (``tours``),
2. coverage times and production rates along those tours (``coverage``),
3. collision-free phase shifts between the agents' periodic plans
   (``schedule``),
4. an event-exact simulation with summary metrics (``simulate``).

``oracle`` holds independent brute-force references used to validate the
optimizers, and ``cli`` exposes the whole pipeline as a command-line tool.
"""

__version__ = "0.1.0"
