"""
集成测试模块

测试各个组件之间的协作和整个工作流程
"""