"""使用图模型与类层次结构。"""
