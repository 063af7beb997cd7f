"""Report artifacts: timeline SVGs and summary tables"""
