"""
稳定噪声McKean-Vlasov数值工具包
"""
