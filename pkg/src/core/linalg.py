"""
Linear Algebra Helpers - 小规模稠密线性代数

所有迹泛函都通过 Cholesky 求解计算，不显式求逆。
"""

from typing import Tuple, Type

import numpy as np
from scipy import linalg as sla

from .errors import CovShiftError, SingularSource

# 可逆判定: λmin > INVERTIBLE_RTOL · λmax
INVERTIBLE_RTOL = 1e-10


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def is_invertible(M: np.ndarray) -> bool:
    """对称矩阵的可逆判定"""
    eig = np.linalg.eigvalsh(symmetrize(np.asarray(M, dtype=float)))
    return bool(eig[-1] > 0 and eig[0] > INVERTIBLE_RTOL * eig[-1])


def cholesky(
    M: np.ndarray,
    error: Type[CovShiftError] = SingularSource,
    name: str = "matrix",
) -> Tuple[np.ndarray, bool]:
    """
    可逆性检查后的 Cholesky 分解

    Returns:
        scipy.linalg.cho_factor 的 (c, lower)

    Raises:
        error: 矩阵不可逆或分解失败
    """
    M = symmetrize(np.asarray(M, dtype=float))
    if not is_invertible(M):
        raise error(f"{name} is not invertible")
    try:
        return sla.cho_factor(M, lower=True, check_finite=True)
    except np.linalg.LinAlgError as e:
        raise error(f"{name}: Cholesky failed ({e})") from e


def solve_psd(
    A: np.ndarray,
    B: np.ndarray,
    error: Type[CovShiftError] = SingularSource,
    name: str = "matrix",
) -> np.ndarray:
    """求解 A X = B (A 对称正定)"""
    return sla.cho_solve(cholesky(A, error, name), B)


def trace_solve(A: np.ndarray, B: np.ndarray, name: str = "matrix") -> float:
    """Tr(A⁻¹ B) = Tr(B A⁻¹)"""
    return float(np.trace(solve_psd(A, B, name=name)))


def inverse_psd(A: np.ndarray, name: str = "matrix") -> np.ndarray:
    """A⁻¹，经 Cholesky 求解得到 (仅用于 d×d 小矩阵的组合公式)"""
    return symmetrize(solve_psd(A, np.eye(A.shape[0]), name=name))


def generalized_max_eig(A: np.ndarray, B: np.ndarray, name: str = "matrix") -> float:
    """
    广义特征值 A v = μ B v 的最大值

    等于 ‖B^{-1/2} A B^{-1/2}‖₂，也等于 ‖A^{1/2} B⁻¹ A^{1/2}‖₂
    """
    cholesky(B, name=name)
    return float(sla.eigh(symmetrize(A), symmetrize(B), eigvals_only=True)[-1])


def extreme_eigs(M: np.ndarray) -> Tuple[float, float]:
    """(λmin, λmax)"""
    eig = np.linalg.eigvalsh(symmetrize(np.asarray(M, dtype=float)))
    return float(eig[0]), float(eig[-1])


__all__ = [
    "INVERTIBLE_RTOL",
    "symmetrize",
    "is_invertible",
    "cholesky",
    "solve_psd",
    "trace_solve",
    "inverse_psd",
    "generalized_max_eig",
    "extreme_eigs",
]
