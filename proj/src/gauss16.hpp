#pragma once

// Gauss-Legendre 16-point rule on [0, 1], shared by the cell quadrature.

namespace adtm::detail {

inline constexpr int kG16 = 16;

inline constexpr double kG16x[kG16] = {
    0.0052995325041750337019, 0.0277124884633836999569,
    0.0671843988060841224019, 0.1222977958224984867952,
    0.1910618777986781147150, 0.2709916111713863151316,
    0.3591982246103705422868, 0.4524937450811812866824,
    0.5475062549188187133176, 0.6408017753896294577132,
    0.7290083888286136848684, 0.8089381222013218852850,
    0.8777022041775015132048, 0.9328156011939158775981,
    0.9722875115366163000431, 0.9947004674958249662981};

inline constexpr double kG16w[kG16] = {
    0.0135762297058770482066, 0.0311267619693239468159,
    0.0475792558412463928441, 0.0623144856277669384470,
    0.0747979944082883679845, 0.0845782596975012679330,
    0.0913017075224617918882, 0.0947253052275342510846,
    0.0947253052275342510846, 0.0913017075224617918882,
    0.0845782596975012679330, 0.0747979944082883679845,
    0.0623144856277669384470, 0.0475792558412463928441,
    0.0311267619693239468159, 0.0135762297058770482066};

}  // namespace adtm::detail
