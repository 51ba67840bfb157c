"""playprobe: a personality-driven automated playtesting harness.

The package bundles a deterministic turn-based dungeon crawler, an LLM
gateway with record/replay, a personality-conditioned hybrid planner,
an action summarizer, a retrieval-backed memory system, interaction
coverage and diversity metrics, and a campaign runner with random
baselines.
"""

__version__ = "0.1.0"
