"""US-QA 3D 대시보드 패키지"""
