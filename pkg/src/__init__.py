# -*- coding: utf-8 -*-
"""
Talking Portrait - 源代码包
音频驱动、带眨眼控制的三平面哈希说话人像辐射场（纯 numpy 实现）
"""
