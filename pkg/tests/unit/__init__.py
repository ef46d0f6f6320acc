"""
单元测试模块

测试各个组件的独立功能，确保每个模块都能正确工作。
"""