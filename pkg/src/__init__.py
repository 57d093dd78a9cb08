# CCPG - Learning causally consistent partition graphs with few CI tests
