"""Núcleo numérico: geometria, potenciais, discretização, espectro, calor e desigualdades"""
