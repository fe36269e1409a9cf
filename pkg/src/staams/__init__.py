"""staams: constraint-based task allocation and motion scheduling for
multi-arm workcells.

The package turns an abstract task (Ordered Visiting Constraints over
workspace locations) and a motion model (per-component roadmaps with a
collision table) into a single constraint-optimization instance and solves
it for a makespan-minimized, collision-free timed plan.
"""

__version__ = "0.1.0"
