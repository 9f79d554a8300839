package br.ufscar.advanced.adapters;

public class BluetoothAdapter {
    private int scanMode;

    public int getScanMode() {
        int min = 40;
        if (scanMode < min) {
            return min;
        }
        return scanMode;
    }

    public double readDistance() {
        return 0.0;
    }
}
