"""Retrieval-effectiveness evaluation harness for web search engines.

The pipeline has four stages, each usable on its own:

1. ``sampler``   -- turn a raw query log into a popularity-representative,
   intent-stratified query sample.
2. ``collector`` -- submit sampled queries to engine adapters, capture ranked
   results and page snapshots.
3. ``study``     -- pool and anonymize results into judgment tasks, serve them
   to jurors over HTTP, record judgments and navigational verdicts.
4. ``metrics``   -- re-attach judgments to engines and compute the report
   (precision@k, graded statistics, navigational success, MRR, overlap).

``store`` provides durable file-based persistence, ``cli`` the orchestration
commands (sample / collect / serve / report / validate).
"""

__version__ = "0.1.0"
