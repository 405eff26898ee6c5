"""Software re-creation of a frequency-actuated vibration micro-robot stack.

Subpackages cover the resonance-mode motion table, planar kinematics, a
simulated arena with a pinhole camera, a from-scratch CNN target classifier,
the closed-loop controller, and the byte-level command protocol.
"""

__version__ = "0.1.0"
