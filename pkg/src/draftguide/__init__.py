"""draftguide: compose-time moderation rules with experiment tooling.

Subpackages: ``rules`` (rule compilation and draft evaluation, backed
by the ``regexengine`` linear-time matcher), ``experiment`` (arm
assignment, funnel simulation, outcome aggregation), ``analysis``
(Poisson effects with robust errors, report rendering), ``service``
(HTTP moderation service), and ``cli``.
"""

__version__ = "0.1.0"
