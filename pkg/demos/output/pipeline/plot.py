"""Plot the CSV artifacts in this directory (matplotlib required)."""
import csv
import os
import matplotlib.pyplot as plt

def load(name):
    with open(os.path.join(os.path.dirname(__file__) or '.', name)) as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]
            if k not in ('side', 'region')}

if os.path.exists('run.csv'):
    d = load('run.csv')
    plt.figure()
    plt.semilogy(d['t'], d['sup_u'], label='sup u')
    plt.semilogy(d['t'], d['sup_w'], label='sup w')
    plt.xlabel('t'); plt.legend(); plt.title('density peaks')
    plt.savefig('sup_u.png', dpi=150)

for name in sorted(os.listdir(os.path.dirname(__file__) or '.')):
    if name.startswith('overlay_') and name.endswith('.csv'):
        d = load(name)
        plt.figure()
        plt.plot(d['s'], d['U_sim'], label='U (simulated)')
        plt.plot(d['s'], d['uU'], '--', label='uU (candidate)')
        plt.xlabel('s'); plt.legend(); plt.title(name)
        plt.savefig(name.replace('.csv', '.png'), dpi=150)

if os.path.exists('residual_grid.csv'):
    d = load('residual_grid.csv')
    plt.figure()
    sc = plt.scatter(d['s'], d['t'], c=d['p_value'], s=6)
    plt.colorbar(sc, label='P residual')
    plt.xscale('log'); plt.xlabel('s'); plt.ylabel('t')
    plt.savefig('residual_grid.png', dpi=150)
print('plots written')
