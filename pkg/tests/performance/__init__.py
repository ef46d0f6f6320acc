"""
性能测试模块

监控系统性能指标，确保系统在各种负载下的稳定性
"""