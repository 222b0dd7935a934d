"""mixdih: mixed dihedral 2-group engine.

Builds the order-2**56 mixed dihedral group on two elementary abelian
subgroups of rank 4, its order-2**59 cyclic extension, and a desk-scale
rank-2 analogue; verifies their structure, automorphisms and clique
graphs; and runs the regular-subgroup descent that certifies the
bipartite graph on subgroup cosets is not a Cayley graph.
"""

__version__ = "0.1.0"
