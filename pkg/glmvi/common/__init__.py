"""
Copyright (c) 2023 European Union
Licenced under the MIT licence

Helpers shared by all glmvi sub-packages: logger creation, the exception
hierarchy and small linear algebra routines.
"""
