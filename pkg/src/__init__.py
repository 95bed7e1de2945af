"""Name Evolution Miner - wiki 名称演化挖掘工具"""

__version__ = "1.0.0"
