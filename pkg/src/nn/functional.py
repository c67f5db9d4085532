# -*- coding: utf-8 -*-
"""
激活函数及其导数
所有函数保持输入的 dtype
"""

import numpy as np


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0).astype(x.dtype, copy=False)


def relu_grad(x: np.ndarray) -> np.ndarray:
    return (x > 0).astype(x.dtype)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """数值稳定的 sigmoid"""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_grad_from_output(y: np.ndarray) -> np.ndarray:
    return y * (1.0 - y)


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + e^x)，对大正数不溢出"""
    return (np.maximum(x, 0) + np.log1p(np.exp(-np.abs(x)))).astype(x.dtype, copy=False)


def softplus_grad(x: np.ndarray) -> np.ndarray:
    return sigmoid(x)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=axis, keepdims=True)


# 名称 -> (前向, 由输入求导, 由输出求导)；两种求导只需其一
ACTIVATIONS = {
    "identity": (lambda x: x, lambda x: np.ones_like(x), None),
    "relu": (relu, relu_grad, None),
    "sigmoid": (sigmoid, None, sigmoid_grad_from_output),
    "softplus": (softplus, softplus_grad, None),
}


def activation_backward(kind: str, pre: np.ndarray, post: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """把上游梯度穿过激活函数"""
    _, from_input, from_output = ACTIVATIONS[kind]
    if kind == "identity":
        return grad
    if from_output is not None:
        return grad * from_output(post)
    return grad * from_input(pre)
