"""
hardyheat
Ground states, desigualdades funcionais e núcleos do calor para operadores de Schrödinger
com potenciais de Hardy em domínios estratificados
"""
__version__ = "0.1.0"
