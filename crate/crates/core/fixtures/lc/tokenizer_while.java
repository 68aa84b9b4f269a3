import java.io.*;
import java.util.*;

public class Main {
    public static void main(String[] args) throws IOException {
        BufferedReader in = new BufferedReader(new InputStreamReader(System.in));
        StringTokenizer st = new StringTokenizer(in.readLine());
        int n = Integer.parseInt(st.nextToken());
        int[] a = new int[n];
        int k = 0;
        while (k < n) {
            while (!st.hasMoreTokens()) {
                st = new StringTokenizer(in.readLine());
            }
            a[k] = Integer.parseInt(st.nextToken());
            k++;
        }
        int best = 0;
        for (int i = 0; i < n; i++) {
            for (int j = i + 1; j < n; j++) {
                best = Math.max(best, a[i] + a[j]);
            }
        }
        System.out.println(best);
    }
}
