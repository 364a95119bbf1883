"""Voter model dynamics on the directed configuration model.

Tools for sampling random digraphs with prescribed in/out degrees, running
exact voter dynamics with discordant-edge tracking, sampling dual coalescing
random walks, and comparing both against closed-form predictions.
"""

__version__ = "0.1.0"
