"""MiniLang 前端：解析、降级、调用图与 SDG。"""
