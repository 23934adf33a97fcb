# Independent quadrature of the (theta, phi) two-band Hall integrands for the
# Rashba-Dresselhaus model; values frozen into the C++ tests come from here.
import numpy as np
from scipy import integrate
def parts(lam, beta, h0, gamma):
    def d(kx, ky): return np.array([lam*ky-beta*kx, -lam*kx+beta*ky, h0])
    J = np.array([[-beta, lam],[-lam, beta]])  # d(dx,dy)/d(kx,ky) rows dx,dy
    def f(r, t, which):
        kx, ky = r*np.cos(t), r*np.sin(t)
        dx, dy, dz = d(kx, ky)
        rho2 = dx*dx+dy*dy; E = np.sqrt(rho2+dz*dz); rho = np.sqrt(rho2)
        th = np.arctan2(rho, dz)
        # dtheta/dk, dphi/dk
        drho = (dx*J[0]+dy*J[1])/rho
        dth = dz*drho/(E*E)
        dph = (dx*J[1]-dy*J[0])/rho2
        c, s = np.cos(th), np.sin(th)
        if which == 0:
            v = s*c/(1+c*c)*(dth[0]*dph[1]-dth[1]*dph[0])
        else:
            v = gamma*(c/(2*E*(1+c*c))*dth[0]*dth[1] + c*s*s*(1+0.5*s*s)/(E*(1+c*c)**2)*dph[0]*dph[1])
        return v*r/(2*np.pi)
    out = []
    for w in (0, 1):
        val, err = integrate.dblquad(lambda t, u: f(np.exp(u), t, w)*np.exp(u), np.log(1e-6), np.log(1e6), 0, 2*np.pi, epsabs=1e-12, epsrel=1e-10)
        out.append(val)
    return out
if __name__ == "__main__":
    for beta, h0 in [(10, 5), (30, 5), (10, 2)]:
        print(beta, h0, parts(23, beta, h0, 0.1))
