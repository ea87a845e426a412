"""tests package marker"""
