"""situ-talker: a situated-dialogue engine and simulator.

Physical objects and places carry stripe-coded IDs.  Detecting an ID
switches the active lexicon, knowledge base, and plan library; noisy
text utterances are decoded into N-best word sequences, parsed into
semantic frames, explained by plan recognition, and answered through
templates with a display channel synchronized to the spoken channel.
"""

__version__ = "0.1.0"
