"""honeysim: a deterministic simulation of a virtualized cloud under
attack, defended by an autonomous agent that manages deception
honeypots, learns from a shaped reward, selects actions through a
resource-gated decision cascade, and operates inside hard guardrails.

Hot per-tick kernels run from an optional compiled extension with a
pure-Python fallback; see honeysim._kernels.BACKEND for the active one.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
