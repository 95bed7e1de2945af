"""Name Evolution Miner 测试"""
