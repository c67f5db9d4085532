# -*- coding: utf-8 -*-
"""
辐射场模块包
条件编码与三平面哈希辐射场
"""

from .condition import ConditionVector, ConditionEncoder, encode_condition
from .radiance_field import FieldOutput, RadianceField, field_eval

__all__ = [
    "ConditionVector",
    "ConditionEncoder",
    "encode_condition",
    "FieldOutput",
    "RadianceField",
    "field_eval",
]
