import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall


def apsp(n, edges):
    """All-pairs hop distances via Floyd-Warshall (independent of the BFS code)."""
    if not edges:
        d = np.full((n, n), np.inf)
        np.fill_diagonal(d, 0)
        return d
    rows = [u for u, v in edges] + [v for u, v in edges]
    cols = [v for u, v in edges] + [u for u, v in edges]
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return floyd_warshall(mat, directed=False, unweighted=True)


@pytest.fixture
def apsp_oracle():
    return apsp
