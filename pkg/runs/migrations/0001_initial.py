import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SweepModel',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('key', models.CharField(max_length=16)),
                ('values', models.JSONField(default=list)),
                ('config', models.JSONField(default=dict)),
                ('created', models.DateTimeField(auto_now_add=True)),
            ],
        ),
        migrations.CreateModel(
            name='GapRunModel',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=16)),
                ('sweep_value', models.CharField(blank=True, default='', max_length=32)),
                ('config', models.JSONField(default=dict)),
                ('seed', models.IntegerField(default=0)),
                ('bare_h', models.FloatField(null=True)),
                ('final_h', models.FloatField(null=True)),
                ('c_plus_estimate', models.FloatField(null=True)),
                ('iterations', models.IntegerField(default=0)),
                ('converged', models.BooleanField(default=False)),
                ('runtime', models.FloatField(default=0.0)),
                ('trace_path', models.CharField(blank=True, default='', max_length=512)),
                ('error', models.TextField(blank=True, default='')),
                ('created', models.DateTimeField(auto_now_add=True)),
                ('sweep', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.CASCADE, related_name='runs', to='runs.sweepmodel')),
            ],
            options={
                'ordering': ['created', 'id'],
            },
        ),
    ]
