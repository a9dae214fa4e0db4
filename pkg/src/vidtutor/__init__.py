"""Lecture-grounded feedback for programming exercises.

Indexes lecture-video transcripts into a timestamped vector store and runs a
two-stage retrieval-augmented prompt chain that streams feedback citing exact
video timestamps as markdown footnotes.
"""

__version__ = "0.1.0"
