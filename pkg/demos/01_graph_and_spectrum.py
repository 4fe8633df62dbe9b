"""Walk through the communication graph and its reduced coordinates.

Four followers listen to each other and to a leader (agent 5). We check that
the leader reaches everyone, split the Laplacian into its consensus direction
and a reduced block, and solve the Lyapunov equation used by the analysis.
"""

import numpy as np

from bitrack import has_spanning_tree_rooted_at_leader, laplacian, paper_topology, reduce, solve_lyapunov

np.set_printoptions(precision=4, suppress=True)

t = paper_topology()
for i in range(t.n_followers):
    print(f"agent {i + 1} hears {[j + 1 for j in t.neighbors(i)]}")
print("leader reaches every follower:", has_spanning_tree_rooted_at_leader(t))

L = laplacian(t)
print("Laplacian:\n", L)

sr = reduce(L)
print("left null vector pi:", sr.pi)
print("reduced block L_tilde:\n", sr.L_tilde)

sol = solve_lyapunov(sr.L_tilde)
print("H:\n", sol.H)
print(f"lambda_max(H) = {sol.lambda_max:.4f}, h = 1/lambda_min(H) = {sol.h:.4f}")
