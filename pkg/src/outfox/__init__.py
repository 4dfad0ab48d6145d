"""Adversarial model-in-the-loop data collection for three-way inference.

Writers try to fool a model adversary into mispredicting a target label;
verifiers adjudicate the fooling examples; splits are assembled from the
verified ones; statistics and figures summarize every round.
"""

__version__ = "0.1.0"
