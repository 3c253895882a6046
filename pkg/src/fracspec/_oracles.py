"""Reference values from adaptive quadrature of integral representations.

Computed once with QUADPACK (relative tolerance 1e-13) and frozen here so
the acceptance report does not depend on the routines it checks:

* ``Gamma(a) = int_0^inf t^{a-1} e^{-t} dt``
* ``erfc(1) = 2/sqrt(pi) int_1^inf e^{-t^2} dt``
* ``K_nu(x) = int_0^inf exp(-x cosh u) cosh(nu u) du``
"""

GAMMA_3_4 = 1.2254167024651776
GAMMA_1_4 = 3.625609908221908
ERFC_1 = 0.1572992070502851

BESSEL_X = (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0)
BESSEL_K = {
    0.1: (7.6735905190531835, 4.934666009755598, 2.4670534102276833, 0.9300865291314784,
          0.42256594495516936, 0.114130203536809, 0.0036944832782554553,
          1.7788551507869297e-05, 2.1328272173424438e-14),
    0.25: (11.75647627193446, 6.165741264139242, 2.685156871876059, 0.9603163249318859,
           0.4307397744485855, 0.11537827684085677, 0.0037123027320318407,
           1.7833184439806398e-05, 2.1346641833090346e-14),
    0.4: (23.104951131747814, 9.010471810777927, 3.1286910477284486, 1.0186278103166082,
          0.4462859398346682, 0.11772913317042331, 0.0037456131230898058,
          1.791636313403612e-05, 2.1380798462498175e-14),
    0.75: (183.23463852175826, 32.54345278535703, 5.596702511268131, 1.2917498162179128,
           0.5157753006959187, 0.12790297862917901, 0.003886159254974276,
           1.8263751436705318e-05, 2.1522377447115043e-14),
    0.9: (499.71226556252134, 62.88143924847679, 7.761163528680413, 1.4885580510030043,
          0.5630611832461583, 0.1345504621657256, 0.00397505822011054,
          1.8480604344102193e-05, 2.1609895543864527e-14),
}
