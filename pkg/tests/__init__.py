"""
稳定噪声McKean-Vlasov数值工具包测试

测试目录结构：
- unit/: 单元测试 - 网格、半群、范数、核、阈值、求解器、粒子与实验编排
- integration/: 集成测试 - 求解器参考解、粒子与PDE一致性、全流程与命令行
- performance/: 性能测试 - 求解耗时、范数延迟、分块内存与粒子吞吐
- fixtures/: 测试配置 - 标准化的实验配置文件
"""
