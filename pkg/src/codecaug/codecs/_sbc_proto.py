"""Frozen 80-tap prototype for the 8-band analysis/synthesis filterbank.

Numerically optimized for tight-frame (near-perfect-reconstruction)
behaviour of the cosine-modulated bank with hop 8; see
tools/design_sbc_prototype.py for the derivation. Measured interior
round-trip error 2.54e-06 relative, stopband -55 dB.
"""

import numpy as np

PROTOTYPE_8 = np.array([
     9.49558120307368327e-06,  7.75913276307843152e-05,  2.88832492485388667e-04,  6.64864969058688582e-04,
     6.62408842813023329e-04,  1.38783493795253591e-04,  1.03623392489815327e-04,  1.48502947621923133e-04,
     2.36613940897340772e-04,  4.49797789929148992e-04,  6.94139722611581225e-04,  8.21782607252031280e-04,
     1.05750038646396159e-03,  7.22383566949182641e-04,  1.47481797642380185e-04, -1.29981221954565684e-03,
    -3.58987162340150198e-03, -6.98923006201068210e-03, -1.12607614946678529e-02, -1.62551657766078668e-02,
    -2.16074647351601201e-02, -2.67967825859330329e-02, -3.09330939406345998e-02, -3.30620276760754325e-02,
    -3.21630036099492880e-02, -2.70663614754556234e-02, -1.68815934381178478e-02, -7.86009226016670063e-04,
     2.16805236633778840e-02,  5.07291281489214430e-02,  8.59267393110426797e-02,  1.26514404875195940e-01,
     1.71191342127687440e-01,  2.18263091001368675e-01,  2.65646687811062210e-01,  3.11078041365946356e-01,
     3.52229127419284360e-01,  3.86887099527196077e-01,  4.13144889000029991e-01,  4.29521885970157447e-01,
     4.35087796325024201e-01,  4.29519971872841855e-01,  4.13140662136032455e-01,  3.86879356293728105e-01,
     3.52176253275225004e-01,  3.11058098007472417e-01,  2.65617454314327484e-01,  2.18220498191282142e-01,
     1.71139163219790391e-01,  1.26444371849666615e-01,  8.58468825687280640e-02,  5.06367003414242636e-02,
     2.16074224578139754e-02, -9.00994866322372468e-04, -1.70056455946265180e-02, -2.72031551785609990e-02,
    -3.22914784721174686e-02, -3.31989372111753320e-02, -3.10573273218523009e-02, -2.69119286957634797e-02,
    -2.17995065330147363e-02, -1.63475009736713979e-02, -1.13406013179541774e-02, -7.05926114453152287e-03,
    -3.65107845846599941e-03, -1.34089468585585434e-03,  1.21562774156985139e-04,  7.07781974312619291e-04,
     6.63094081306602866e-04,  8.22637960865920011e-04,  6.99100879515883109e-04,  4.57026537579932526e-04,
     2.21183457514981697e-04,  1.57644700224234956e-04,  1.12814971745540908e-04,  1.47395574365785192e-04,
     2.45531975643887353e-04,  6.70238955977171097e-04,  2.92173429599626553e-04,  7.91053538260238413e-05,
])

# 40-tap companion for the 4-band mode, same design procedure.
# Measured interior round-trip error 2.72e-06 relative, stopband -53 dB.
PROTOTYPE_4 = np.array([
     2.11504370612486622e-05,  4.04774788241035971e-04,  9.25402585573343694e-04,  1.51775162677142688e-04,
     3.72255545761883216e-04,  9.82980960145437383e-04,  1.52677411056899412e-03,  1.70902980921723444e-04,
    -5.12739618389593341e-03, -1.58414597139442288e-02, -3.03820464083151068e-02, -4.35069739018187907e-02,
    -4.53071593252095464e-02, -2.38877164183106290e-02,  3.03888739664090780e-02,  1.21101164220933477e-01,
     2.41668204903284473e-01,  3.75420827029440352e-01,  4.98148725965856132e-01,  5.84543800275901582e-01,
     6.15668078913097827e-01,  5.84539632555897359e-01,  4.98058981383394606e-01,  3.75391742118744876e-01,
     2.41617609256499083e-01,  1.21021476186034593e-01,  3.03819126793603324e-02, -2.40116306103001012e-02,
    -4.54305052252358260e-02, -4.36310756964933544e-02, -3.06094491670103157e-02, -1.59211721976409946e-02,
    -5.19815416846080951e-03,  1.44979111325305930e-04,  9.27583965076057750e-04,  9.87733527754390073e-04,
     3.28859168171229685e-04,  1.60697770291868603e-04,  2.49055165539990007e-04,  4.07961033482854651e-04,
])
