#!/usr/bin/env python3
"""
Autovalores de referência em forma fechada
==========================================

Uso: python3 scripts/oraculo_bessel.py [c ...]
Exemplo: python3 scripts/oraculo_bessel.py 0 0.1875 0.25
"""

import sys
import os

# Adiciona o diretório raiz ao path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from hardyheat.core.spectral import (
    oracle_example_I_ball,
    oracle_example_III_interval,
    oracle_layer_mu1,
    oracle_zero_interval,
)


def imprimir_oraculos(constantes):
    print("📐 Oráculos de Bessel")
    print(f"   V = 0 em (0,1):            λ₁ = {oracle_zero_interval()!r}")
    print(f"   Exemplo III em (0,1):      λ₁ = {oracle_example_III_interval()!r}")
    for c in constantes:
        print(f"   Exemplo I, bola 3D, c={c:g}: λ₁ = {oracle_example_I_ball(c)!r}")
    for delta in (0.2, 0.1, 0.05, 0.025):
        print(f"   Camada δ={delta:g}:          μ₁ = {oracle_layer_mu1(delta)!r}")


if __name__ == '__main__':
    try:
        constantes = [float(a) for a in sys.argv[1:]] or [0.0, 0.1875, 0.25]
    except ValueError:
        print("❌ Uso: python3 scripts/oraculo_bessel.py [c ...]")
        sys.exit(1)
    imprimir_oraculos(constantes)
    print("✅ Pronto")
