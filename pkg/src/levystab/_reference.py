# Generated offline with mpmath at 40 significant digits.

GAMMA = {
    0.1: 9.5135076986687312858,
    0.25: 3.6256099082219083119,
    0.5: 1.7724538509055160273,
    0.75: 1.2254167024651776451,
    1.0: 1.0,
    1.25: 0.90640247705547707798,
    1.5: 0.88622692545275801365,
    2.0: 1.0,
    2.5: 1.3293403881791370205,
    3.3: 2.6834373819557683003,
    5.0: 24.0,
    7.5: 1871.2543057977883465,
    10.0: 362880.0,
    13.7: 2861595499.066014607,
    20.0: 121645100408832000.0,
    25.5: 3.0867705405286967828e+24,
    33.0: 2.6313083693369353017e+35,
    41.2: 1.7114033683216029147e+48,
    50.0: 6.0828186403426756087e+62,
    -0.75: -4.8341465442958777492,
    -1.5: 2.3632718012073547031,
    -2.5: -0.94530872048294188123,
}

DIGAMMA = {
    0.1: -10.423754940411076232,
    0.25: -4.2274535333762654081,
    0.5: -1.9635100260214234794,
    0.75: -1.0858608797864721696,
    1.0: -0.57721566490153286061,
    1.25: -0.22745353337626540809,
    1.5: 0.036489973978576520559,
    2.0: 0.42278433509846713939,
    2.5: 0.70315664064524318723,
    3.3: 1.0348224890596216863,
    5.0: 1.5061176684318004727,
    7.5: 1.9467574842460867881,
    10.0: 2.2517525890667211076,
    13.7: 2.580455723899652534,
    20.0: 2.9705239922421490509,
    25.5: 3.2189424728839197665,
    33.0: 3.4812795305349872422,
    41.2: 3.7062532433798492173,
    50.0: 3.901989673427892197,
}

DIGAMMA_ROOT = 1.4616321449683623413
